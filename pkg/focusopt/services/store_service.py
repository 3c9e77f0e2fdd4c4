"""
存储服务 - Λ 值缓存与验证运行记录的持久化
"""

import json
import uuid
from datetime import datetime
from typing import Any, Dict, Iterable, List, Optional, Tuple

from peewee import DoesNotExist, IntegrityError

from ..models import LambdaRecord, VerificationRecord, init_db, close_db, db
from ..models.reports import VerificationSummary
from ..utils.constants import Convention
from ..utils.helpers import to_builtin
from ..utils.logger import get_logger

logger = get_logger("focusopt_store")


class StoreService:
    """SQLite 持久化；只在调用线程中使用"""

    def __init__(self, config: Dict[str, Any]):
        self.config = config
        self.storage_config = config.get("storage", {})
        self.db_path = self.storage_config.get("db_path", "focusopt_cache.db")
        init_db(self.db_path)
        logger.info(f"存储已启用: {self.db_path}")

    @staticmethod
    def radius_key(R: float) -> str:
        """半径的精确键"""
        return float(R).hex()

    def get_lambda(self, d: int, k: int, R: float, convention: Convention) -> Optional[float]:
        """
        查询缓存的 Λ_{d,k}(R)

        Args:
            d: 维数
            k: 球谐次数
            R: 半径
            convention: 前置系数约定

        Returns:
            缓存值，未命中时为 None
        """
        try:
            record = LambdaRecord.get(
                (LambdaRecord.d == d)
                & (LambdaRecord.k == k)
                & (LambdaRecord.radius_key == self.radius_key(R))
                & (LambdaRecord.convention == Convention.parse(convention).value)
            )
            return record.value
        except DoesNotExist:
            return None

    def put_lambda(self, d: int, k: int, R: float, convention: Convention, value: float) -> None:
        """写入缓存，已存在时忽略"""
        try:
            LambdaRecord.insert(
                d=d,
                k=k,
                radius_key=self.radius_key(R),
                radius=float(R),
                convention=Convention.parse(convention).value,
                value=float(value),
            ).on_conflict_ignore().execute()
        except IntegrityError as e:
            logger.warning(f"Λ 缓存写入失败: {str(e)}")

    def put_many(self, rows: Iterable[Tuple[int, int, float, Convention, float]]) -> int:
        """批量写入缓存，返回写入条数"""
        payload = [
            {
                "d": d,
                "k": k,
                "radius_key": self.radius_key(R),
                "radius": float(R),
                "convention": Convention.parse(conv).value,
                "value": float(value),
            }
            for d, k, R, conv, value in rows
        ]
        if not payload:
            return 0
        with db.atomic():
            LambdaRecord.insert_many(payload).on_conflict_ignore().execute()
        return len(payload)

    def record_checks(self, summary: VerificationSummary) -> str:
        """
        保存一次验证运行的全部检验结果

        同一配置的每次运行各占一批，历史中不会相互覆盖。

        Args:
            summary: 验证汇总

        Returns:
            本次保存的批次编号
        """
        batch_id = uuid.uuid4().hex
        created_at = datetime.now()
        payload = [
            {
                "run_id": summary.run_id,
                "batch_id": batch_id,
                "check_id": check.check_id,
                "status": check.status,
                "observed": json.dumps(to_builtin(check.observed), sort_keys=True),
                "tolerance": json.dumps(to_builtin(check.tolerance), sort_keys=True),
                "detail": check.detail,
                "created_at": created_at,
            }
            for check in summary.checks
        ]
        with db.atomic():
            for start in range(0, len(payload), 100):
                VerificationRecord.insert_many(payload[start:start + 100]).execute()
        logger.info(f"验证运行 {summary.run_id} 已保存 {len(payload)} 项（批次 {batch_id}）")
        return batch_id

    def recent_runs(self, limit: int = 5) -> List[Dict[str, Any]]:
        """最近几次验证运行的通过/失败统计，新的在前"""
        runs: Dict[str, Dict[str, Any]] = {}
        query = VerificationRecord.select().order_by(VerificationRecord.created_at.desc(), VerificationRecord.id.desc())
        for record in query:
            entry = runs.get(record.batch_id)
            if entry is None:
                if len(runs) >= limit:
                    continue
                entry = runs[record.batch_id] = {
                    "run_id": record.run_id,
                    "batch_id": record.batch_id,
                    "created_at": record.created_at.isoformat(timespec="seconds"),
                    "pass": 0,
                    "fail": 0,
                    "info": 0,
                }
            entry[record.status] = entry.get(record.status, 0) + 1
        return list(runs.values())

    def close(self) -> None:
        close_db()
