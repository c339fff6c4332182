import numpy as np

from linhyp.verify import random_spec_perturbed, random_spec_simple


def random_specs(variant, count, seed=0):
    rng = np.random.default_rng(seed)
    gen = random_spec_perturbed if variant == "perturbed" else random_spec_simple
    return [gen(rng) for _ in range(count)]
