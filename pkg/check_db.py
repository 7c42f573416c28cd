#!/usr/bin/env python3
import sys

from penaltylab.database import ResultsDatabase


def check_best_points(db_path='penaltylab.db', metric='ground_count'):
    db = ResultsDatabase(db_path)
    best = db.get_best_points(metric)
    print(f"Best {metric} per experiment ({len(best)} experiments):")

    for experiment, A, B, value in best:
        print(f"{experiment}: A={A:g} B={B:g} -> {value}")


if __name__ == "__main__":
    check_best_points(*sys.argv[1:3])
