"""Logistic regression with up-sampling, backward stepwise AIC and p-value pruning."""

import numpy as np
from scipy.special import expit

from dlab.models import (
    backward_stepwise_aic, classification_metrics, fit_logistic, logistic_table, pvalue_prune, resample, roc_auc,
)
from dlab.numerics import SeededRng

# Rare events driven by two of five features.
rng = np.random.default_rng(3)
n = 4000
Z = rng.normal(size=(n, 5))
X = np.column_stack([np.ones(n), Z])
y = (rng.random(n) < expit(X @ [-4.0, 1.2, -0.9, 0, 0, 0])).astype(int)
names = ["(Intercept)", "a", "b", "n1", "n2", "n3"]
print("positives:", int(y.sum()), "of", n)

Xr, yr = resample(X, y, "up", SeededRng(7))
print("after up-sampling:", np.bincount(yr).tolist())

full = fit_logistic(Xr, yr, names)
stepped, log = backward_stepwise_aic(Xr, yr, names)
for s in log:
    print(f"  drop {s.term:<4} AIC {s.aic_before:.2f} -> {s.aic_after:.2f}")
final, dropped = pvalue_prune(Xr, yr, names, 0.05, start=stepped.terms)
print("p-value pruning removed:", dropped or "nothing")
print(logistic_table(final))

cols = [names.index(t) for t in final.terms]
prob = final.predict_proba(X[:, cols])
m = classification_metrics(y, (prob >= 0.5).astype(int))
print(m.confusion.as_dict())
print({k: round(v, 3) for k, v in m.as_dict().items() if isinstance(v, float)})
print("AUC on the original rows:", round(roc_auc(y, prob).auc, 3))
