"""PCA through a masked similarity transform of the covariance matrix.

Run: python3 demos/outsourced_pca.py
"""
import numpy as np

from cloakmat import cloud_evd, cov_matrix, evd_decrypt, evd_encrypt, evd_verify, keygen_evd, make_rng, pca_project

np.set_printoptions(suppress=True)
rng = make_rng(4)
# 6 features, 300 samples, most variance along two hidden directions
basis = rng.standard_normal((6, 2))
data = basis @ rng.standard_normal((2, 300)) * 3 + 0.1 * rng.standard_normal((6, 300))

x, a = cov_matrix(data, outsource=True, rng=rng)
key = keygen_evd(6, 16, rng)
b = evd_encrypt(key, a)
print("cloud sees a non-symmetric matrix:", not np.allclose(b, b.T))

spec_enc = cloud_evd(b)
print("cloud spectrum accepted:           ", evd_verify(b, spec_enc, 20, rng))
spec = evd_decrypt(key, spec_enc)
print("eigenvalues:", np.round(spec.eigenvalues, 3))
print("reference:  ", np.round(np.sort(np.linalg.eigvalsh(a))[::-1], 3))

scores = pca_project(spec, 2, x)
kept = np.sum(scores ** 2) / np.sum(x ** 2)
print(f"variance kept by 2 components: {kept:.4f}")
