from enum import IntEnum

import numpy as np

from fedpower.exceptions import ValidationError


class Purpose(IntEnum):
    """Labels for the last element of an RngStream path."""

    INIT = 0
    ORTHO_FILL = 1
    NOISE_A = 2
    NOISE_B = 3
    NOISE_INPUT = 4
    CLIENT_SAMPLING = 5
    BATCH = 6
    TASK = 7
    SHADOW = 8
    ATTACK = 9
    SERVER = 10
    CLIENT = 11


class RngStream:
    """Seeded Gaussian/uniform source addressed by (master_seed, path).

    Identical (master_seed, path) pairs replay identical draws; distinct paths
    are independent (numpy SeedSequence spawn keys). Not thread-safe: give each
    worker its own child stream.
    """

    __slots__ = ("master_seed", "path", "_generator")

    def __init__(self, master_seed, path=()):
        if int(master_seed) < 0:
            raise ValidationError(f"master seed must be non-negative, got {master_seed}")
        self.master_seed = int(master_seed) & 0xFFFFFFFFFFFFFFFF
        self.path = tuple(int(p) for p in path)
        self._generator = None

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, path={self.path})"

    @property
    def generator(self):
        if self._generator is None:
            seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=self.path)
            self._generator = np.random.default_rng(seq)
        return self._generator

    def child(self, *labels):
        return RngStream(self.master_seed, self.path + tuple(int(label) for label in labels))

    def normal(self, size, scale=1.0):
        return self.generator.normal(0.0, scale, size=size)

    def random(self, size=None):
        return self.generator.random(size)

    def choice(self, n, size, replace=False):
        return self.generator.choice(n, size=size, replace=replace)

    def permutation(self, n):
        return self.generator.permutation(n)
