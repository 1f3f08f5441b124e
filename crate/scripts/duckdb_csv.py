#!/usr/bin/env python3
"""Reads SQL statements on stdin, runs them in an in-memory DuckDB database
and prints the rows of the last statement as headerless CSV.

    RECAP_SQL_TEST_DB="python3 scripts/duckdb_csv.py" cargo test
"""
import csv
import sys

import duckdb


def main() -> int:
    con = duckdb.connect(":memory:")
    statements = [s.strip() for s in sys.stdin.read().split(";\n") if s.strip()]
    rows = []
    for stmt in statements:
        rows = con.execute(stmt).fetchall()
    writer = csv.writer(sys.stdout)
    for row in rows:
        writer.writerow(row)
    return 0


if __name__ == "__main__":
    sys.exit(main())
