"""Narrow box response approaching the nondispersive medium.

A response that is constant over a window of width ``delta`` and zero
afterwards tends to an instantaneous medium as ``delta`` shrinks. The
kernel Z then approaches a free oscillation at the reduced frequency
``omega_q / sqrt((1 + chi_e0)(1 + chi_m0))``. The printed deviations fall
roughly tenfold per decade of ``delta``.
"""
import numpy as np

from maxdiq.kernels import KernelRequest, energy_invariant, kernel_Z, uniform_grid
from maxdiq.scenarios import box_media, reference_kernel

chi_e0, chi_m0, wq = 3.0, 1.0, 1.0
t = uniform_grid(20.0, 401)
limit = reference_kernel("box-limit", "Z", {"chi_e0": chi_e0, "chi_m0": chi_m0, "omega_q": wq}, t)

previous = None
for delta in (1e-1, 1e-2, 1e-3):
    e, m = box_media(chi_e0, chi_m0, delta)
    z = kernel_Z(KernelRequest(electric=e, magnetic=m, omega_q=wq, t=t))
    dev = float(np.max(np.abs(z.values - limit.values)))
    ratio = "" if previous is None else f"  (ratio {previous / dev:.2f})"
    print(f"delta={delta:g}: max |Z - Z_limit| = {dev:.3e}{ratio}")
    previous = dev

_, drift = energy_invariant(limit, chi_e0, chi_m0, wq)
print(f"relative energy drift of the limit kernel {drift:.1e}")
