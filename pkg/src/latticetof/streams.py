"""Counter-based random streams for reproducible parallel shot generation.

Every shot of an experiment gets its own Philox generator keyed by the master
seed, with the run index placed in the counter. Streams therefore depend only
on (master_seed, run_index), never on worker count or evaluation order.
"""

import numpy as np


def philox_key(master_seed):
    """Expand a master seed into the 128-bit Philox key."""
    return np.random.SeedSequence(int(master_seed)).generate_state(2, np.uint64)


def shot_stream(master_seed, run_index):
    """Generator for one run, identical no matter how runs are scheduled."""
    bits = np.random.Philox(counter=[0, 0, 0, int(run_index)],
                            key=philox_key(master_seed))
    return np.random.Generator(bits)


def derive_seed(master_seed, label_index):
    """Deterministic 64-bit child seed for a named sub-experiment."""
    seq = np.random.SeedSequence([int(master_seed), int(label_index)])
    return int(seq.generate_state(1, np.uint64)[0])


def fresh_seed():
    """Random 63-bit seed from OS entropy, for configs that omit one."""
    return int(np.random.SeedSequence().entropy % (2**63))
