"""Field kernel of a step-response dielectric.

A medium whose polarization responds to a field kick with a constant
``beta u(t)`` damps the mode. This script computes Z for an underdamped
and an overdamped case, compares them with the closed form and fits the
late-time decay rate.

Run with ``python3 notebooks/step_kernel.py``.
"""
import numpy as np

from maxdiq.kernels import KernelRequest, asymptotic_decay_check, kernel_Z, uniform_grid
from maxdiq.medium import Step
from maxdiq.scenarios import reference_kernel

t = uniform_grid(20.0, 2048)

for beta, wq in [(1.0, 2.0), (5.0, 1.0)]:
    req = KernelRequest(electric=Step(beta=beta), omega_q=wq, t=t)
    z = kernel_Z(req)
    ref = reference_kernel("step", "Z", {"beta": beta, "omega_q": wq}, t)
    dev = np.max(np.abs(z.values - ref.values)) / np.max(np.abs(ref.values))
    print(f"beta={beta} omega_q={wq}: method={z.method}, deviation from closed form {dev:.2e}")

    # the two roots of s^2 + beta s + omega_q^2 set the envelope
    roots = np.roots([1.0, beta, wq * wq])
    slowest = float(-roots.real.max())
    if np.all(roots.imag == 0):
        # no oscillation, so fit log|Z| over the second half instead of peaks
        half = t.size // 2
        fitted = -np.polyfit(t[half:], np.log(np.abs(z.values[half:])), 1)[0]
    else:
        fitted = asymptotic_decay_check(z, slowest).rate
    print(f"    slowest rate {slowest:.4f}, fitted {fitted:.4f}")
