"""
数据库连接管理
"""

import os

from peewee import SqliteDatabase

DEFAULT_DB_PATH = os.path.join(os.getcwd(), "focusopt_cache.db")

# 延迟初始化：只有启用存储时才绑定到具体文件
db = SqliteDatabase(None)


def init_db(path: str = DEFAULT_DB_PATH) -> SqliteDatabase:
    """
    绑定数据库文件并建表

    Args:
        path: SQLite 文件路径，":memory:" 用于测试

    Returns:
        已连接的数据库对象
    """
    from .lambda_record import LambdaRecord
    from .verification_record import VerificationRecord

    if not db.is_closed():
        db.close()
    if path != ":memory:":
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
    db.init(path, pragmas={"journal_mode": "wal" if path != ":memory:" else "memory"})
    db.connect(reuse_if_open=True)
    db.create_tables([LambdaRecord, VerificationRecord], safe=True)
    return db


def close_db() -> None:
    """关闭连接（未初始化时无操作）"""
    if db.database is not None and not db.is_closed():
        db.close()
