"""Unit conventions shared across the package.

Energies are frequencies (value/h) in GHz, temperatures in kelvin, rates in
1/s.  k_B/h is pinned to the CODATA value; nothing here is configurable.
"""

KB_GHZ_PER_K = 20.836619  # k_B/h in GHz/K

GHZ_TO_HZ = 1.0e9
