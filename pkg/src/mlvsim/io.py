"""Trace and policy-log files: documented CSV formats and readers.

Column order is fixed and floats are written with repr so that a rerun of
the same manifest produces byte-identical files.
"""

import csv
from dataclasses import dataclass

from .engine import PolicyLogEntry, RequestRecord


def write_trace(path, records):
    with open(path, "w") as fh:
        fh.write(RequestRecord.CSV_HEADER + "\n")
        for record in records:
            fh.write(record.csv_row() + "\n")


@dataclass(frozen=True)
class TraceRow:
    """One trace line re-read from disk (the fields aggregation needs)."""

    id: int
    model_id: str
    app_class: str
    served_version: int
    tau_p_ms: float
    tau_i_ms: float
    tau_t_ms: float
    tau_s_ms: float
    tau_q_ms: float
    total_ms: float
    accuracy: float
    stability: float


def read_trace(path):
    rows = []
    with open(path) as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            rows.append(TraceRow(
                id=int(row["id"]), model_id=row["model"],
                app_class=row["app_class"],
                served_version=int(row["served_version"]),
                tau_p_ms=float(row["tau_p_ms"]),
                tau_i_ms=float(row["tau_i_ms"]),
                tau_t_ms=float(row["tau_t_ms"]),
                tau_s_ms=float(row["tau_s_ms"]),
                tau_q_ms=float(row["tau_q_ms"]),
                total_ms=float(row["total_ms"]),
                accuracy=float(row["accuracy"]),
                stability=float(row["stability"])))
    return rows


def write_policy_log(path, entries):
    with open(path, "w") as fh:
        fh.write(PolicyLogEntry.CSV_HEADER + "\n")
        for entry in entries:
            fh.write(entry.csv_row() + "\n")


def _opt_float(text):
    return float(text) if text else None


def _opt_state(text):
    return tuple(int(c) for c in text.split(";")) if text else None


def read_policy_log(path):
    entries = []
    with open(path) as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            entries.append(PolicyLogEntry(
                time_ms=float(row["time_ms"]), model_id=row["model"],
                replica_id=int(row["replica"]),
                old_version=int(row["old_version"]),
                new_version=int(row["new_version"]),
                action=int(row["action"]), forced=row["forced"],
                epsilon=_opt_float(row["epsilon"]),
                state=_opt_state(row["state"]),
                reward=_opt_float(row["reward"]),
                next_state=_opt_state(row["next_state"]),
                q_before=_opt_float(row["q_before"]),
                q_after=_opt_float(row["q_after"]),
                max_next=_opt_float(row["max_next"]),
                reward_total_ms=_opt_float(row["reward_total_ms"]),
                reward_accuracy=_opt_float(row["reward_accuracy"]),
                reward_stability=_opt_float(row["reward_stability"]),
                delay_budget_ms=_opt_float(row["delay_budget_ms"])))
    return entries


def trace_filename(policy, seed):
    return f"trace_{policy}_s{seed}.csv"


def policy_log_filename(policy, seed):
    return f"policylog_{policy}_s{seed}.csv"


def qtable_filename(policy, seed):
    return f"qtable_{policy}_s{seed}.csv"
