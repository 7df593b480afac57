"""
Deterministic batch selection

The rows of a batch are a pure function of (seed, stream, step), so a run can
be reproduced or resumed at any step without replaying the data order.
"""

from Common.seeding import derived_rng

PARALLEL_STREAM = 0
TRANSCRIPTION_STREAM = 1


def batch_indices(seed, stream, step, corpus_size, batch_size):
    """Distinct corpus rows for one step, in draw order"""
    rng = derived_rng(seed, stream, step)
    size = min(batch_size, corpus_size)
    return [int(i) for i in rng.choice(corpus_size, size=size, replace=False)]
