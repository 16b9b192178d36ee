"""Модели базы данных результатов и CRUD операции."""

from datetime import datetime
from typing import Any, Dict, List, Optional

from loguru import logger
from sqlalchemy import JSON, Boolean, Column, DateTime, Float, ForeignKey, Integer, String, create_engine
from sqlalchemy.orm import Session, declarative_base, relationship, sessionmaker

from .config import settings

Base = declarative_base()


class RunRecord(Base):
    """Запуск команды CLI над одним сценарием."""

    __tablename__ = "runs"

    id = Column(Integer, primary_key=True, index=True)
    scenario_hash = Column(String(64), index=True, nullable=False)
    command = Column(String(20), nullable=False)
    started_at = Column(DateTime, default=datetime.utcnow)
    wall_time_s = Column(Float, nullable=True)

    # Описание сценария и сводка
    scenario = Column(JSON, default=dict)
    summary = Column(JSON, default=dict)

    # Связи
    seeds = relationship("SeedRecord", back_populates="run", cascade="all, delete-orphan")

    def __repr__(self):
        return f"<RunRecord(id={self.id}, command={self.command}, hash={self.scenario_hash[:8]})>"


class SeedRecord(Base):
    """Итог одной траектории ансамбля."""

    __tablename__ = "seed_results"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("runs.id"), nullable=False)
    seed = Column(String(20), nullable=False)  # uint64 не помещается в Integer
    final_x = Column(Float, nullable=True)
    slope = Column(Float, nullable=True)
    martingale_terminal = Column(Float, nullable=True)
    n_events = Column(Integer, nullable=True)
    n_fixed = Column(Integer, nullable=True)
    returns = Column(Integer, nullable=True)
    complete = Column(Boolean, default=True)

    # Связи
    run = relationship("RunRecord", back_populates="seeds")

    def __repr__(self):
        return f"<SeedRecord(run_id={self.run_id}, seed={self.seed})>"


class ResultsStore:
    """Хранилище результатов запусков."""

    def __init__(self, database_url: Optional[str] = None):
        """
        Инициализация хранилища.

        Args:
            database_url: URL подключения SQLAlchemy
        """
        self.database_url = database_url or settings.results_db_url
        if not self.database_url:
            raise ValueError("Не задан URL базы результатов (LAGSIM_RESULTS_DB_URL)")
        self.engine = create_engine(self.database_url)
        self.SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=self.engine)
        logger.info(f"Подключение к БД результатов: {self.database_url}")

    def create_tables(self):
        """Создает все таблицы в БД."""
        try:
            Base.metadata.create_all(bind=self.engine)
            logger.success("Таблицы БД созданы успешно")
        except Exception as e:
            logger.error(f"Ошибка создания таблиц: {e}")
            raise

    def get_session(self) -> Session:
        """Возвращает сессию БД."""
        return self.SessionLocal()

    def add_run(
        self,
        scenario_hash: str,
        command: str,
        scenario: Dict[str, Any],
        summary: Dict[str, Any],
        seed_rows: List[Dict[str, Any]] = (),
        wall_time_s: Optional[float] = None,
    ) -> int:
        """Сохраняет запуск вместе с потраекторными строками; возвращает id."""
        with self.get_session() as session:
            run = RunRecord(
                scenario_hash=scenario_hash,
                command=command,
                scenario=scenario,
                summary=summary,
                wall_time_s=wall_time_s,
            )
            for row in seed_rows:
                run.seeds.append(
                    SeedRecord(
                        seed=str(row["seed"]),
                        final_x=row.get("final_x"),
                        slope=row.get("slope"),
                        martingale_terminal=row.get("martingale_terminal"),
                        n_events=row.get("n_events"),
                        n_fixed=row.get("n_fixed"),
                        returns=row.get("returns"),
                        complete=row.get("status", "ok") == "ok",
                    )
                )
            session.add(run)
            session.commit()
            logger.info(f"Сохранен запуск {command} сценария {scenario_hash[:8]} ({len(run.seeds)} seed)")
            return run.id

    def get_runs(self, scenario_hash: str) -> List[RunRecord]:
        """Запуски данного сценария, новые первыми."""
        with self.get_session() as session:
            return (
                session.query(RunRecord)
                .filter(RunRecord.scenario_hash == scenario_hash)
                .order_by(RunRecord.started_at.desc(), RunRecord.id.desc())
                .all()
            )

    def get_seed_results(self, run_id: int) -> List[SeedRecord]:
        with self.get_session() as session:
            return session.query(SeedRecord).filter(SeedRecord.run_id == run_id).order_by(SeedRecord.id).all()
