"""Anisotropic 40x40 synthetic field: exponential and Matérn fits on 1100 nodes."""

import json
import sys

from kappaln.studies import spatial_study

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 5
res = spatial_study(seed=seed)
print(json.dumps({"exp": {"cv": res.exp_cv.as_dict(), "fit": res.exp_fit},
                  "matern": {"cv": res.matern_cv.as_dict(), "fit": res.matern_fit},
                  "seconds": round(res.seconds, 1)}, indent=2, default=float))
