"""Golden summaries of S([n]) shipped with the package to catch canonical-form drift."""
from __future__ import annotations

import hashlib
import json
from collections import Counter
from pathlib import Path

from .nni import build_nni_graph, find_critical_triplets
from .poset import Poset, augment, count_maximal_chains

GOLDEN_DIR = Path(__file__).with_name("golden")
GOLDEN_NS = (3, 4, 5)


def summarize(s: Poset) -> dict:
    """Counts and a content hash for an unbounded S([n])."""
    p = augment(s)
    profile = Counter(s.ranks)
    out = {
        "n": s.n,
        "elements": len(s),
        "rank_profile": [profile[r] for r in range(max(s.ranks) + 1)],
        "cover_relations": sum(len(c) for c in s.covers),
        "coatoms": len(s.maximal()),
        "maximal_chains": count_maximal_chains(s),
        "poset_sha256": hashlib.sha256(s.dumps().encode()).hexdigest(),
    }
    g = build_nni_graph(p)
    out["nni_edges"] = g.num_edges
    out["critical_triplets"] = len(find_critical_triplets(p)) if s.n >= 5 else 0
    return out


def golden_path(n: int, directory: Path | None = None) -> Path:
    return (directory or GOLDEN_DIR) / f"summary_n{n}.json"


def load(n: int, directory: Path | None = None) -> dict | None:
    path = golden_path(n, directory)
    if not path.exists():
        return None
    return json.loads(path.read_text())


def write(summary: dict, directory: Path | None = None) -> Path:
    path = golden_path(summary["n"], directory)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    return path


def compare(summary: dict, golden: dict) -> list[str]:
    """Names of fields that differ from the golden record."""
    return sorted(k for k in golden if summary.get(k) != golden[k])


def hasse_three() -> dict:
    return json.loads((GOLDEN_DIR / "hasse_n3.json").read_text())
