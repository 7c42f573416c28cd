import sqlite3
from datetime import datetime
from typing import List, Sequence, Tuple

from loguru import logger

from penaltylab.errors import ArgumentError, ConfigError
from penaltylab.sweep_runner import SweepRecord

METRICS = ("ground_count", "practical_count", "dynamic_range")


class ResultsDatabase:
    def __init__(self, db_path='penaltylab.db'):
        self.db_path = db_path
        self.init_database()

    def init_database(self):
        """Initialize the database with required tables"""
        try:
            conn = sqlite3.connect(self.db_path)
            cursor = conn.cursor()

            # One row per sweep grid point
            cursor.execute('''
                CREATE TABLE IF NOT EXISTS sweep_records (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    experiment TEXT NOT NULL,
                    A REAL NOT NULL,
                    B REAL NOT NULL,
                    x_axis REAL,
                    dynamic_range REAL,
                    ground_count INTEGER,
                    practical_count INTEGER,
                    n_reads INTEGER NOT NULL,
                    seed TEXT NOT NULL,
                    timestamp TEXT DEFAULT CURRENT_TIMESTAMP
                )
            ''')

            conn.commit()
            conn.close()
            logger.debug("✅ Results database ready at {}", self.db_path)

        except sqlite3.Error as e:
            raise ConfigError(f"cannot initialize results database {self.db_path}: {e}") from e

    def log_records(self, experiment: str, records: Sequence[SweepRecord]):
        """Archive a sweep under an experiment label"""
        now = datetime.now().isoformat()
        rows = [
            (experiment, r.A, r.B, r.x_axis, r.dynamic_range, r.ground_count, r.practical_count, r.n_reads, str(r.seed), now)
            for r in records
        ]
        try:
            conn = sqlite3.connect(self.db_path)
            cursor = conn.cursor()

            cursor.executemany('''
                INSERT INTO sweep_records (experiment, A, B, x_axis, dynamic_range, ground_count,
                                           practical_count, n_reads, seed, timestamp)
                VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
            ''', rows)

            conn.commit()
            conn.close()
            logger.info("🗄️ Archived {} records under {!r}", len(rows), experiment)

        except sqlite3.Error as e:
            raise ConfigError(f"cannot write to results database {self.db_path}: {e}") from e

    def get_records(self, experiment: str) -> List[SweepRecord]:
        """Records of one experiment in insertion order"""
        try:
            conn = sqlite3.connect(self.db_path)
            cursor = conn.cursor()

            cursor.execute('''
                SELECT A, B, x_axis, dynamic_range, ground_count, practical_count, n_reads, seed
                FROM sweep_records
                WHERE experiment = ?
                ORDER BY id
            ''', (experiment,))

            rows = cursor.fetchall()
            conn.close()

        except sqlite3.Error as e:
            raise ConfigError(f"cannot read results database {self.db_path}: {e}") from e
        return [SweepRecord(*row[:7], int(row[7])) for row in rows]

    def get_best_points(self, metric: str = "ground_count") -> List[Tuple[str, float, float, float]]:
        """Per experiment, the (A, B) point with the largest metric"""
        if metric not in METRICS:
            raise ArgumentError(f"unknown metric {metric!r}; use one of {METRICS}")
        try:
            conn = sqlite3.connect(self.db_path)
            cursor = conn.cursor()

            # SQLite returns the bare columns of the row that holds MAX()
            cursor.execute(f'''
                SELECT experiment, A, B, MAX({metric})
                FROM sweep_records
                WHERE {metric} IS NOT NULL
                GROUP BY experiment
                ORDER BY experiment
            ''')

            best = cursor.fetchall()
            conn.close()
            return best

        except sqlite3.Error as e:
            raise ConfigError(f"cannot read results database {self.db_path}: {e}") from e
