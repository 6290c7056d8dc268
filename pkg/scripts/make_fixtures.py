"""Regenerate the bundled test corpora under tests/data/.

corpus/     200 seeded random instances (all four kinds) for round-trip tests
harness20/  20 small instances plus expected.jsonl computed by brute force
"""
import argparse
import os
import random
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, os.path.join(HERE, "..", "tests"))

from helpers import DATA, random_instance  # noqa: E402
from mccomp.cnf_io import save_instance  # noqa: E402
from mccomp.core import ProblemKind  # noqa: E402
from mccomp.counting import count_bruteforce  # noqa: E402
from mccomp.judge import ExpectedCount, save_expected  # noqa: E402


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=2021)
    args = ap.parse_args()

    corpus = os.path.join(DATA, "corpus")
    os.makedirs(corpus, exist_ok=True)
    rng = random.Random(args.seed)
    for i in range(200):
        inst = random_instance(rng, n_max=30, m_max=60)
        save_instance(inst, os.path.join(corpus, f"gen_{i:03d}.cnf"))

    h20 = os.path.join(DATA, "harness20")
    os.makedirs(h20, exist_ok=True)
    rng = random.Random(args.seed + 1)
    expected = {}
    kinds = list(ProblemKind)
    for i in range(20):
        while True:
            inst = random_instance(rng, kind=kinds[i % 4], n_max=12, m_max=30)
            # keep one unsatisfiable instance, the rest with nonzero counts
            if (count_bruteforce(inst) == 0) == (i == 19):
                break
        name = f"h{i:02d}_{inst.kind.value}"
        save_instance(inst, os.path.join(h20, name + ".cnf"))
        expected[name] = ExpectedCount(count_bruteforce(inst))
    save_expected(expected, os.path.join(h20, "expected.jsonl"))


if __name__ == "__main__":
    main()
