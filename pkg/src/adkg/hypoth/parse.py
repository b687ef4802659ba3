"""The fenced HYPOTHESES block: rendering and parsing."""

from __future__ import annotations

import json
import re

from adkg.errors import DataError, ParseError
from adkg.hypoth.model import RELATIONS, Hypothesis, Triple

BLOCK_RE = re.compile(r"```[ \t]*HYPOTHESES[ \t]*\r?\n(.*?)```", re.DOTALL)


def render_block(hyps) -> str:
    items = [
        {
            "id": h.id,
            "triples": [{"subject": t.subject, "relation": t.relation, "object": t.object} for t in h.triples],
            "narrative": h.narrative,
            "reasoning": h.reasoning,
        }
        for h in hyps
    ]
    return "```HYPOTHESES\n" + json.dumps(items, indent=2) + "\n```"


def parse_hypotheses(raw: str, model_id: str = "") -> list[Hypothesis]:
    m = BLOCK_RE.search(raw)
    if m is None:
        raise ParseError("no HYPOTHESES block found in response", raw=raw)
    body = m.group(1)
    try:
        items = json.loads(body)
    except json.JSONDecodeError as exc:
        pos = m.start(1) + exc.pos
        raise ParseError(f"malformed HYPOTHESES block at position {pos}: {exc.msg}", raw=raw, position=pos) from None
    if not isinstance(items, list):
        raise ParseError("HYPOTHESES block must hold a JSON array", raw=raw, position=m.start(1))
    merged = {}
    order = []
    for i, item in enumerate(items):
        if not isinstance(item, dict) or "triples" not in item:
            raise ParseError(f"entry {i} lacks a triples list", raw=raw, position=m.start(1))
        triples = []
        for t in item["triples"]:
            rel = t.get("relation")
            if rel not in RELATIONS:
                raise ParseError(f"relation {rel!r} not in vocabulary {RELATIONS}", raw=raw, position=m.start(1))
            triples.append(Triple(str(t["subject"]), rel, str(t["object"])))
        try:
            h = Hypothesis(str(item.get("id", f"h{i + 1}")), tuple(triples), str(item.get("narrative", "")),
                           model_id, str(item.get("reasoning", "")))
        except DataError as exc:
            raise ParseError(f"entry {i}: {exc}", raw=raw, position=m.start(1)) from None
        if h.key in merged:
            if len(h.narrative) > len(merged[h.key].narrative):
                merged[h.key] = h
        else:
            merged[h.key] = h
            order.append(h.key)
    return [merged[k] for k in order]
