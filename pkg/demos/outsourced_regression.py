"""Least squares on masked data; the cloud never sees X, y or beta.

Run: python3 demos/outsourced_regression.py
"""
import numpy as np

from cloakmat import cloud_lr, keygen_lr, lr_center, lr_decrypt, lr_encrypt, lr_verify, make_rng

rng = make_rng(3)
true_beta, true_beta0 = np.array([1.5, -0.5, 2.0, 0.25]), -3.0
x = rng.uniform(-2, 2, (200, 4))
y = x @ true_beta + true_beta0 + 0.01 * rng.standard_normal(200)

design = lr_center(x, y)
key = keygen_lr(*x.shape, 16, rng)
x_enc, y_enc = lr_encrypt(key, design)
beta_enc = cloud_lr(x_enc, y_enc)
print("cloud answer passes the normal-equation check:", lr_verify(x_enc, y_enc, beta_enc))

fit = lr_decrypt(key, beta_enc, design)
print("masked beta (what the cloud sees):", np.round(beta_enc, 3))
print("recovered beta: ", np.round(fit.beta, 4), " intercept:", round(float(fit.beta0), 4))
print("true beta:      ", true_beta, " intercept:", true_beta0)
