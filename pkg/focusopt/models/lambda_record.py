"""
Λ 值缓存模型 - 按 (d, k, R, 约定) 存储径向积分结果
"""

from datetime import datetime

from peewee import DateTimeField, FloatField, IntegerField, Model, TextField

from .database import db


class LambdaRecord(Model):
    """Λ_{d,k}(R) 缓存记录"""

    d = IntegerField()
    k = IntegerField()
    radius_key = TextField()  # float.hex(R)，精确匹配
    radius = FloatField()
    convention = TextField()
    value = FloatField()
    created_at = DateTimeField(default=datetime.now)

    class Meta:
        database = db
        table_name = "lambda_values"
        indexes = (
            (("d", "k", "radius_key", "convention"), True),
        )
