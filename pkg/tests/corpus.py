"""Seeded synthetic corpus and helpers shared by the core and acceptance tests."""

import json
import random
import time

from fecorrect import backends as bk
from fecorrect.types import CorrectionTask, PipelineConfig

SUBJECTS = ["Paris", "The Nile", "Marie Curie", "Mount Fuji", "The Louvre", "Insulin", "Tokyo", "Dolphins"]
OBJECTS = ["France", "Egypt", "Poland", "Japan", "the museum", "glucose", "the ocean", "Italy"]
VERBS = ["is located in", "flows through", "was born in", "overlooks", "houses", "regulates", "hosted", "live in"]


def mock_corpus(n=50, seed=7):
    rng = random.Random(seed)
    tasks = []
    for i in range(n):
        s, v, o, o2 = rng.choice(SUBJECTS), rng.choice(VERBS), rng.choice(OBJECTS), rng.choice(OBJECTS)
        claim = f"{s} {v} {o}."
        evidence = f"{s} {v} {o2}. It is {rng.randint(2, 900)} years old."
        tasks.append(CorrectionTask(f"task-{i:03d}", claim, evidence))
    return tasks


class JitterEntailment(bk.OverlapEntailment):
    """Overlap scorer that sleeps a little so worker threads interleave."""

    name = "jitter-overlap"

    def score(self, premise, hypothesis):
        time.sleep((hash(hypothesis) % 5) * 1e-4)
        return super().score(premise, hypothesis)


def mock_backends(fixtures_dir, jitter=True):
    backends = bk.backends_from_fixture(fixtures_dir / "echo_mock.json", PipelineConfig())
    if jitter:
        backends = bk.BackendSet(backends.qg, backends.qa, backends.qa2claim, JitterEntailment())
    return backends


def serialize(outputs):
    return "\n".join(json.dumps(o.to_dict(), ensure_ascii=False) for o in outputs)
