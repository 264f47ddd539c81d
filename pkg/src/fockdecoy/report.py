"""Session report serialization.

Both formats keep a fixed field order and write every float with 17
significant digits, so a parsed report re-serializes to identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from typing import Any

from .estimation import ClickLedger, DetectionVerdict, TransmittivityEstimate
from .session import SessionReport

__all__ = ["report_to_dict", "report_from_dict", "emit_report", "parse_report", "format_float", "dump_json"]

_INT_RE = re.compile(r"^-?\d+$")


def format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = f"{x:.17g}"
    # keep floats distinguishable from ints after parsing
    if _INT_RE.match(s):
        s += ".0"
    return s


def dump_json(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """``json.dumps`` with 17-significant-digit floats and insertion-ordered keys."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        # NaN/Infinity are not JSON; report them as null
        return format_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dump_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}{dump_json(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _estimate_dict(e: TransmittivityEstimate) -> dict:
    return {
        "k": e.k,
        "sent": e.sent,
        "clicked": e.clicked,
        "rate": e.rate,
        "ci_low": e.ci_low,
        "ci_high": e.ci_high,
        "eta": e.eta,
        "eta_low": e.eta_low,
        "eta_high": e.eta_high,
    }


def _num(x):
    return None if x is None or (isinstance(x, float) and not math.isfinite(x)) else x


def report_to_dict(r: SessionReport) -> dict:
    v = r.verdict
    verdict = None
    if v is not None:
        verdict = {
            "attack_detected": v.attack_detected,
            "alpha": v.alpha,
            "eta1_interval": list(v.eta1_interval),
            "eta2_interval": list(v.eta2_interval),
            "estimates": [_estimate_dict(e) for e in v.estimates],
        }
    return {
        "scheme": r.scheme,
        "seed": r.seed,
        "pulses": r.pulses,
        "decoy_pulses": r.decoy_pulses,
        "wcp_pulses": r.wcp_pulses,
        "untagged_decoys": r.untagged_decoys,
        "excluded_decoys": r.excluded_decoys,
        "ledger": [{"tag": t, "sent": r.ledger.sent(t), "clicked": r.ledger.clicked(t)} for t in r.ledger.tags()],
        "insufficient_data": r.insufficient_data,
        "verdict": verdict,
        "transmittivity_ratio": None if r.transmittivity_ratio is None else [_num(x) for x in r.transmittivity_ratio],
        "wcp_click_rate": _num(r.wcp_click_rate),
        "sifted_key_count": r.sifted_key_count,
        "effective_clock_hz": _num(r.effective_clock_hz),
        "max_decoy_fraction": _num(r.max_decoy_fraction),
        "mu_recommended": _num(r.mu_recommended),
        "mu_flag": r.mu_flag,
    }


def _nan(x):
    return math.nan if x is None else float(x)


def report_from_dict(d: dict) -> SessionReport:
    ledger = ClickLedger()
    for row in d["ledger"]:
        ledger.add(row["tag"], row["sent"], row["clicked"])
    verdict = None
    if d["verdict"] is not None:
        v = d["verdict"]
        ests = tuple(TransmittivityEstimate(**{k: e[k] for k in e}) for e in v["estimates"])
        verdict = DetectionVerdict(
            attack_detected=v["attack_detected"],
            eta1_interval=tuple(v["eta1_interval"]),
            eta2_interval=tuple(v["eta2_interval"]),
            alpha=v["alpha"],
            estimates=ests,
        )
    ratio = d["transmittivity_ratio"]
    return SessionReport(
        scheme=d["scheme"],
        seed=d["seed"],
        pulses=d["pulses"],
        decoy_pulses=d["decoy_pulses"],
        wcp_pulses=d["wcp_pulses"],
        untagged_decoys=d["untagged_decoys"],
        excluded_decoys=d["excluded_decoys"],
        ledger=ledger,
        verdict=verdict,
        insufficient_data=d["insufficient_data"],
        transmittivity_ratio=None if ratio is None else tuple(_nan(x) for x in ratio),
        wcp_click_rate=d["wcp_click_rate"],
        sifted_key_count=d["sifted_key_count"],
        effective_clock_hz=_nan(d["effective_clock_hz"]),
        max_decoy_fraction=_nan(d["max_decoy_fraction"]),
        mu_recommended=d["mu_recommended"],
        mu_flag=d["mu_flag"],
    )


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix[:-1], obj


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v)
    return str(v)


def _uncell(s: str):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    if _INT_RE.match(s):
        return int(s)
    try:
        return float(s)
    except ValueError:
        return s


def _unflatten(pairs):
    root: dict = {}
    for key, value in pairs:
        parts = key.split(".")
        node = root
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value

    def fix(n):
        if isinstance(n, dict):
            if n and all(k.isdigit() for k in n):
                return [fix(n[str(i)]) for i in range(len(n))]
            return {k: fix(v) for k, v in n.items()}
        return n

    return fix(root)


def emit_report(r: SessionReport, fmt: str = "json") -> str:
    """Serialize ``r`` as ``"json"`` or ``"csv"``.

    CSV layout: the ledger block (header ``tag,sent,clicked``), a blank line,
    then ``field,value`` rows with nested fields flattened to dotted names.
    Absent values (no verdict, no WCP pulses) are empty cells.
    """
    d = report_to_dict(r)
    if fmt == "json":
        return dump_json(d) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tag", "sent", "clicked"])
    for row in d.pop("ledger"):
        w.writerow([row["tag"], row["sent"], row["clicked"]])
    w.writerow([])
    w.writerow(["field", "value"])
    if d["verdict"] is None:
        d["verdict"] = ""
    if d["transmittivity_ratio"] is None:
        d["transmittivity_ratio"] = ""
    for key, value in _flatten(d):
        w.writerow([key, _cell(value) if value != "" else ""])
    return buf.getvalue()


def parse_report(text: str, fmt: str = "json") -> SessionReport:
    if fmt == "json":
        return report_from_dict(json.loads(text))
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    ledger_text, _, rest = text.partition("\n\n")
    rows = list(csv.reader(io.StringIO(rest)))
    if not rows or rows[0] != ["field", "value"]:
        raise ValueError("missing field,value block")
    d = _unflatten((k, _uncell(v)) for k, v in rows[1:] if k)
    led = ClickLedger.from_csv(ledger_text)
    d["ledger"] = [{"tag": t, "sent": led.sent(t), "clicked": led.clicked(t)} for t in led.tags()]
    return report_from_dict(d)
