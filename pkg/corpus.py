"""
Bundled link corpus and singular sample generation.

Each file in data/corpus holds one PD code or braid word; the file stem is
the link's name. Singular samples are closures of random braid words with a
few crossings turned into double points, generated from a seed.
"""

import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import List

from algebra import DiagramParseError
from diagram import BraidWord, LinkDiagram, from_braid, make_singular, parse_link

logger = logging.getLogger(__name__)

CORPUS_DIR = Path(__file__).resolve().parent / "data" / "corpus"
MAX_SAMPLE_CROSSINGS = 8


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    diagram: LinkDiagram


def load_link(path_or_name: str) -> LinkDiagram:
    """Read a link from a file path, or from the bundled corpus by name."""
    path = Path(path_or_name)
    if not path.exists():
        bundled = CORPUS_DIR / f"{path_or_name}.txt"
        if not bundled.exists():
            raise DiagramParseError(f"no such link file or corpus entry: {path_or_name}", 0)
        path = bundled
    return parse_link(path.read_text(), name=path.stem)


def load_corpus() -> List[CorpusEntry]:
    entries = [
        CorpusEntry(path.stem, parse_link(path.read_text(), name=path.stem))
        for path in sorted(CORPUS_DIR.glob("*.txt"))
    ]
    logger.info(f"Loaded {len(entries)} corpus links")
    return entries


def singular_samples(double_points: int, count: int = 10, seed: int = 0) -> List[LinkDiagram]:
    """
    ``count`` braid closures with exactly ``double_points`` double points,
    at most MAX_SAMPLE_CROSSINGS crossings each.
    """
    if not 1 <= double_points <= MAX_SAMPLE_CROSSINGS:
        raise ValueError(f"double_points must lie in 1..{MAX_SAMPLE_CROSSINGS}")
    rng = random.Random(f"{seed}:{double_points}")
    samples = []
    for i in range(count):
        strands = rng.choice((2, 3))
        length = rng.randint(max(double_points, 2), MAX_SAMPLE_CROSSINGS)
        letters = [rng.choice((1, -1)) * rng.randint(1, strands - 1) for _ in range(length)]
        diagram = from_braid(BraidWord(strands, tuple(letters)))
        for idx in sorted(rng.sample(range(length), double_points)):
            diagram = make_singular(diagram, idx)
        word = " ".join(str(x) for x in letters)
        samples.append(LinkDiagram(diagram.crossings, diagram.loops, name=f"s{double_points}-{i} [{strands}: {word}]"))
    return samples
