import numpy as np
from scipy.special import airy as scipy_airy
from scprop.uniform import _ai_core, airy_f, airy_f_prime, airy_contour_quadrature

rng = np.random.default_rng(0)
# 1) canonical vs scipy over |xi| <= 20
worst = 0.0; worst_z = None
for _ in range(400):
    r = rng.uniform(0, 20.0); th = rng.uniform(-np.pi, np.pi)
    z = r * np.exp(1j * th)
    ai, aip = _ai_core(z)
    sai, saip, _, _ = scipy_airy(z)
    for mine, ref in ((ai, sai), (aip, saip)):
        err = abs(mine - ref) / max(1.0, abs(ref))
        if err > worst:
            worst, worst_z = err, z
print(f"canonical vs scipy: worst scaled err {worst:.3e} at z = {worst_z}")

# also specifically the hard band: positive real axis 4.5..9
for x in np.linspace(4.5, 9.0, 10):
    ai, aip = _ai_core(x)
    sai, saip, _, _ = scipy_airy(x)
    print(f"  x={x:.2f} relerr Ai {abs(ai-sai)/abs(sai):.2e}  Ai' {abs(aip-saip)/abs(saip):.2e}")

# 2) j-table vs direct quadrature at small |xi|
print("contours vs quadrature (|xi|<=3):")
worst = 0.0
for _ in range(20):
    z = rng.uniform(0, 3.0) * np.exp(1j * rng.uniform(-np.pi, np.pi))
    for j in (1, 2, 3):
        q = airy_contour_quadrature(j, z)
        v = airy_f(j, z)
        err = abs(q - v) / max(1.0, abs(q))
        worst = max(worst, err)
print(f"  worst scaled err {worst:.3e}")

# 3) connection identity
worst = 0.0
for _ in range(50):
    z = rng.uniform(0, 10.0) * np.exp(1j * rng.uniform(-np.pi, np.pi))
    s = airy_f(1, z) + airy_f(2, z) + airy_f(3, z)
    m = max(abs(airy_f(j, z)) for j in (1, 2, 3))
    worst = max(worst, abs(s) / max(1.0, m))
print(f"identity worst scaled residual: {worst:.3e}")

# 4) oracle at large |xi| vs implementation
worst = 0.0
for _ in range(30):
    z = rng.uniform(3.5, 20.0) * np.exp(1j * rng.uniform(-np.pi, np.pi))
    for j in (1, 2, 3):
        q = airy_contour_quadrature(j, z)
        v = airy_f(j, z)
        err = abs(q - v) / max(1.0, abs(q), abs(v))
        if err > worst:
            worst, worst_z = err, (j, z)
print(f"large-|xi| oracle vs impl: worst scaled err {worst:.3e} at {worst_z}")
