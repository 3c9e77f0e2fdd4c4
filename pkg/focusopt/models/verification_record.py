"""
验证运行记录模型
"""

from datetime import datetime

from peewee import DateTimeField, Model, TextField

from .database import db


class VerificationRecord(Model):
    """单项检验的持久化结果"""

    run_id = TextField(index=True)  # 配置哈希，同一配置重复运行时相同
    batch_id = TextField(index=True)  # 每次保存唯一
    check_id = TextField()
    status = TextField()
    observed = TextField(default="")  # JSON 文本
    tolerance = TextField(default="")
    detail = TextField(default="")
    created_at = DateTimeField(default=datetime.now)

    class Meta:
        database = db
        table_name = "verification_records"
        indexes = (
            (("batch_id", "check_id"), True),
            (("check_id", "created_at"), False),
        )
