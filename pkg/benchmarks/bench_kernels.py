"""Compare the compiled and NumPy gate kernels on one application of G.

Usage: python benchmarks/bench_kernels.py [--sites 6] [--cutoff 2] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from plastic_qca import _backend
from plastic_qca.evolution import StepProgram
from plastic_qca.gates import scaling_params
from plastic_qca.lattice import LatticeSpec


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sites", type=int, default=6)
    parser.add_argument("--cutoff", type=int, default=2)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    spec = LatticeSpec(num_sites=args.sites, cutoff=args.cutoff, mass=1.0, coupling=1.0)
    program = StepProgram.build(spec, scaling_params(0.1, 1.0, 1.0, 1.0))
    rng = np.random.default_rng(0)
    psi = rng.normal(size=spec.dim) + 1j * rng.normal(size=spec.dim)
    print(f"N={spec.num_sites} cutoff={spec.cutoff} dim={spec.dim}")

    results = {}
    for name in sorted(_backend.KERNELS):
        results[name] = program.apply(psi, name)
        best = min(timeit.repeat(lambda: program.apply(psi, name), number=1, repeat=args.repeat))
        print(f"{name:>7}: {best * 1e3:9.2f} ms per step")
    if len(results) == 2:
        diff = np.abs(results["cython"] - results["python"]).max()
        print(f"max |cython - python| = {diff:.2e}")


if __name__ == "__main__":
    main()
