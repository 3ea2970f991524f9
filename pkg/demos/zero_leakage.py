"""Why scaled permutations alone leak zeros, and how the rank-one term hides them.

Run: python3 demos/zero_leakage.py
"""
import numpy as np

from cloakmat import ind_zea_game, keygen_lei, keygen_mmc, lei_encrypt, make_rng, mmc_encrypt, zero_count

rng = make_rng(1)
x = np.zeros((6, 6))
x[0, 0] = 1.0
y = np.eye(6)

lei = lei_encrypt(keygen_lei(6, 6, 6, 16, rng), x, y)
masked = mmc_encrypt(keygen_mmc(6, 6, 6, 16, rng), x, y)
print(f"plaintext zeros:              {zero_count(x)}")
print(f"permutation-only ciphertext:  {zero_count(lei.x_enc)}")
print(f"P + H ciphertext:             {zero_count(masked.x_enc)}")

for scheme in ("lei", "proposed"):
    report = ind_zea_game(scheme, 16, 16, 500, rng)
    print(f"{scheme:>9} distinguishing advantage over 500 games: {report.advantage:.3f}")
