"""Masked matrix product: encrypt, let the cloud multiply, decrypt, verify.

Run: python3 demos/outsourced_matmul.py
"""
import numpy as np

from cloakmat import (MmcResult, cloud_mmc, keygen_mmc, make_rng, mmc_decrypt, mmc_encrypt, mmc_verify,
                      mmc_verify_transcript, tamper)

rng = make_rng(2)
m, n, s = 120, 150, 90
x, y = rng.uniform(-1, 1, (m, n)), rng.uniform(-1, 1, (n, s))

key = keygen_mmc(m, n, s, 16, rng)
task = mmc_encrypt(key, x, y)
result = cloud_mmc(task)
z = mmc_decrypt(key, result)

print("relative error vs x @ y:", np.linalg.norm(z - x @ y) / np.linalg.norm(x @ y))
# the client can check the cloud's work on the masked triple it already holds,
# or on the plaintext after decrypting; both run in O(n^2) per loop
print("honest result accepted (masked / plaintext):", mmc_verify_transcript(task, result, 20, rng),
      "/", mmc_verify(x, y, z, 20, rng))

forged = MmcResult(tamper(result.z_enc, "single-entry", 1e-3, rng))
print("forged result accepted (masked / plaintext):", mmc_verify_transcript(task, forged, 20, rng),
      "/", mmc_verify(x, y, mmc_decrypt(key, forged), 20, rng))
