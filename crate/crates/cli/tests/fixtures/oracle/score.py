#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Brute-force scorer for the replay suite.

Reads the authored responses, the ground truth and the token sidecars and
writes expected.json. Matching is found by enumerating every one-to-one
pairing; line labels are counted one line at a time.

    python3 score.py > expected.json
"""

import itertools
import json
import re
import sys
import xml.etree.ElementTree as ET
from fractions import Fraction
from pathlib import Path

HERE = Path(__file__).resolve().parent
FIX = HERE.parent
SUITE = FIX.parent.parent.parent / "core" / "suite"
SAMPLES = ["sram_t110", "uart_t200", "aes_t220"]


def prices():
    text = (FIX / "trojanlens.toml").read_text()
    get = lambda k: float(re.search(rf"^{k}\s*=\s*(\S+)", text, re.M).group(1))
    return get("price_in"), get("price_out")


def load_response(stem):
    text = (FIX / "responses" / f"{stem}.xml").read_text()
    m = re.search(r"<detection\s*/>|<detection>.*?</detection>", text, re.S)
    root = ET.fromstring(m.group(0))
    out = []
    for t in root.findall("trojan"):
        out.append({
            "id": t.get("id"),
            "type": int(t.get("type")),
            "trigger": {int(l.get("n")) for l in t.find("trigger").findall("line")},
            "payload": {int(l.get("n")) for l in t.find("payload").findall("line")},
        })
    return out


def tokens(stem):
    # Sidecars sit next to the fixture, whose name is the prompt digest; the
    # response text identifies it.
    want = (FIX / "responses" / f"{stem}.xml").read_text()
    for f in sorted((FIX / "replay" / "replay").glob("*.xml")):
        if f.read_text() == want:
            side = f.with_name(f.name[:-4] + ".tokens.json")
            if side.exists():
                d = json.loads(side.read_text())
                return d["input_tokens"], d["output_tokens"]
            return None, None
    sys.exit(f"no fixture holds the response for {stem}")


def best_matching(entries, insts):
    """Largest one-to-one set of overlapping pairs; ties go to the set whose
    pairs rank best by (overlap desc, instance id, instance index, entry
    index), compared as sorted rank lists."""
    edges = []
    for ei, e in enumerate(entries):
        for ii, inst in enumerate(insts):
            ov = len((e["trigger"] | e["payload"]) & (inst["trigger"] | inst["payload"]))
            if ov > 0:
                edges.append((ei, ii, ov))
    edges.sort(key=lambda x: (-x[2], insts[x[1]]["id"], x[1], x[0]))
    best = None
    for r in range(len(edges), -1, -1):
        for combo in itertools.combinations(range(len(edges)), r):
            es = [edges[c] for c in combo]
            if len({e[0] for e in es}) < r or len({e[1] for e in es}) < r:
                continue
            if best is None or list(combo) < best[0]:
                best = (list(combo), [(e[0], e[1]) for e in es])
        if best is not None:
            return best[1]
    return []


def score(stem, p_in, p_out):
    ann = json.loads((SUITE / "annotations" / f"{stem}.json").read_text())
    loc = len((SUITE / "designs" / f"{stem}.v").read_text().splitlines())
    insts = [{"id": t["id"], "type": t["type"], "trigger": set(t["trigger_lines"]),
              "payload": set(t["payload_lines"])} for t in ann["trojans"]]
    entries = load_response(stem)
    pairs = best_matching(entries, insts)
    k, tp = len(insts), len(pairs)

    truth, pred = {}, {}
    for inst in insts:
        for l in inst["trigger"]:
            truth[l] = "trigger"
        for l in inst["payload"]:
            truth[l] = "payload"
    for e in entries:
        for l in e["payload"]:
            pred[l] = "payload"
    for e in entries:
        for l in e["trigger"]:
            pred[l] = "trigger"
    ledger = dict(tp_trigger=0, fp_trigger=0, tp_payload=0, fp_payload=0, tp_clean=0, loc=loc)
    for line in range(1, loc + 1):
        p, t = pred.get(line, "clean"), truth.get(line, "clean")
        if p == "clean":
            ledger["tp_clean"] += t == "clean"
        else:
            ledger[("tp_" if p == t else "fp_") + p] += 1

    partner = dict(pairs)
    types = {n: {"tp": 0, "fp": 0} for n in (1, 2, 3)}
    for ei, e in enumerate(entries):
        ok = ei in partner and insts[partner[ei]]["type"] == e["type"]
        types[e["type"]]["tp" if ok else "fp"] += 1

    ti, to = tokens(stem)
    cost = ti * p_in + to * p_out if ti is not None else None
    return {
        "design_id": ann["design_id"],
        "tuple": {"k": k, "tp": tp, "fp": len(entries) - tp, "fn": k - tp},
        "ledger": ledger,
        "types": types,
        "input_tokens": ti,
        "output_tokens": to,
        "monetary_cost": cost,
    }


def ratio(n, d):
    return None if d == 0 else [n, d]


def decimal(q, digits):
    # Exact rational rounding, half to even.
    r = round(q, digits)
    whole, frac = divmod(abs(r) * 10**digits, 10**digits)
    return f"{'-' if r < 0 else ''}{whole}.{int(frac):0{digits}d}"


def fixed2(r):
    return "—" if r is None else decimal(Fraction(*r), 2)


def percent(r):
    return "—" if r is None else decimal(Fraction(100 * r[0], r[1]), 1) + "%"


def cells(name, tup, ledger, types):
    tl = ratio(ledger["tp_trigger"], ledger["tp_trigger"] + ledger["fp_trigger"])
    pl = ratio(ledger["tp_payload"], ledger["tp_payload"] + ledger["fp_payload"])
    ac = ratio(ledger["tp_trigger"] + ledger["tp_payload"] + ledger["tp_clean"], ledger["loc"])
    ctp = sum(c["tp"] for c in types.values())
    cfp = sum(c["fp"] for c in types.values())
    analysis = "; ".join(f"{c['tp']}/{c['tp'] + c['fp']} Type-{n}" for n, c in sorted(types.items())
                         if c["tp"] + c["fp"] > 0) or "—"
    return {
        "tlc": tl, "plc": pl, "ac": ac, "tcca": ratio(ctp, ctp + cfp),
        "row": [name, "{%d, %d, %d, %d}" % (tup["k"], tup["tp"], tup["fp"], tup["fn"]),
                fixed2(tl), fixed2(pl), fixed2(ac), percent(ratio(ctp, ctp + cfp)), analysis],
    }


def main():
    p_in, p_out = prices()
    samples = [score(s, p_in, p_out) for s in SAMPLES]
    for s in samples:
        s.update(cells(s["design_id"], s["tuple"], s["ledger"], s["types"]))
    tup = {f: sum(s["tuple"][f] for s in samples) for f in ("k", "tp", "fp", "fn")}
    ledger = {f: sum(s["ledger"][f] for s in samples) for f in samples[0]["ledger"]}
    types = {n: {c: sum(s["types"][n][c] for s in samples) for c in ("tp", "fp")} for n in (1, 2, 3)}
    agg = {"tuple": tup, "ledger": ledger, "types": types}
    agg.update(cells("Aggregate", tup, ledger, types))
    ins = [s["input_tokens"] for s in samples if s["input_tokens"] is not None]
    outs = [s["output_tokens"] for s in samples if s["output_tokens"] is not None]
    costs = sorted(s["monetary_cost"] for s in samples if s["monetary_cost"] is not None)
    agg["input_tokens_per_sample"] = sum(ins) / len(ins) if ins else None
    agg["output_tokens_per_sample"] = sum(outs) / len(outs) if outs else None
    agg["cost_per_sample"] = sum(costs) / len(costs) if costs else None
    for s in samples:
        s["types"] = {str(n): c for n, c in s["types"].items()}
    agg["types"] = {str(n): c for n, c in agg["types"].items()}
    json.dump({"samples": samples, "aggregate": agg}, sys.stdout, indent=2, ensure_ascii=False)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
