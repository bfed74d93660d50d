"""Regenerate crates/core/data/materials.csv from the xraydb tabulations.

Usage: python3 tools/gen_optical_constants.py > crates/core/data/materials.csv
"""
import numpy as np
import xraydb

# name -> (formula, density g/cm^3)
XRAY = {
    "Pt": ("Pt", 21.45),
    "Pd": ("Pd", 12.02),
    "C": ("C", 2.26),
    "Si": ("Si", 2.33),
    "B4C": ("B4C", 2.52),
    "MgO": ("MgO", 3.58),
    "diamond": ("C", 3.51),
    "Fe-57": ("Fe", 7.874 * 57.0 / 55.845),
    "Sn-119": ("Sn", 7.31 * 119.0 / 118.71),
    "Sc-45": ("Sc", 2.985),
}

# Electronic indices at the Moessbauer energies (delta, beta); these replace
# the tabulated values at the node energies.
NODES = {
    ("Fe-57", 14.4): (7.3e-6, 0.33e-6),
    ("Sn-119", 23.9): (2.2e-6, 0.037e-6),
    ("Sc-45", 12.4): (3.8e-6, 0.13e-6),
    ("C", 14.4): (2.3e-6, 1.2e-9),
    ("C", 23.9): (0.82e-6, 2.8e-10),
    ("C", 12.4): (3.1e-6, 2.2e-9),
}

OPTICAL = {
    # n = 2.4, lossless
    "diamond": (-1.4, 0.0),
    # vacuum gap with a small absorption, n = 1 + 1e-4 i
    "lossy-gap": (0.0, 1.0e-4),
}

grid = sorted(set(np.round(np.arange(5.0, 30.0001, 0.25), 4)) | {12.4, 14.4, 23.9})
optical_grid = [0.0015, 0.00165, 0.0017, 0.00175, 0.00177, 0.0018, 0.00185, 0.0019, 0.002, 0.0022]

print("# Optical constants n = 1 - delta + i beta.")
print("# X-ray rows: xraydb %s (Elam/Chantler tabulations), xray_delta_beta(formula, density, E)." % xraydb.__version__)
print("# Densities (g/cm^3): " + ", ".join("%s=%.4g" % (k, v[1]) for k, v in XRAY.items()))
print("# Rows at 12.4/14.4/23.9 keV for C, Fe-57, Sn-119, Sc-45 are the published electronic indices at the Moessbauer energies.")
print("# Optical rows (1.5-2.2 eV): diamond n = 2.4 lossless; lossy-gap n = 1 + 1e-4 i.")
print("name,energy_keV,delta,beta")
for name in list(XRAY) + ["lossy-gap"]:
    if name in OPTICAL:
        d, b = OPTICAL[name]
        for e in optical_grid:
            print("%s,%.5f,%.6e,%.6e" % (name, e, d, b))
    if name not in XRAY:
        continue
    formula, rho = XRAY[name]
    for e in grid:
        if (name, e) in NODES:
            d, b = NODES[(name, e)]
        else:
            d, b, _ = xraydb.xray_delta_beta(formula, rho, e * 1000.0)
        print("%s,%.4f,%.6e,%.6e" % (name, e, d, b))
