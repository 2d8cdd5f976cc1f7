"""Possession signatures, next-action prediction and possession valuation."""

import json as _json

from ._possig import *  # noqa: F401,F403
from ._possig import _WhatIfService, __version__, run_command as _run_command


def run(command, config=None, oracle=False):
    """Run a pipeline stage. ``config`` is a dict of pipeline settings."""
    text = _json.dumps(config, default=str) if config else ""
    return _run_command(command, text, oracle)


class WhatIfService:
    """In-process what-if predictor with the HTTP service's request format."""

    def __init__(self, checkpoint=None, xg=None, xt=None):
        self._svc = _WhatIfService()
        if checkpoint is not None:
            self.load(checkpoint, xg, xt)

    def load(self, checkpoint, xg, xt):
        self._svc.load(str(checkpoint), str(xg), str(xt))

    @property
    def loaded(self):
        return self._svc.loaded

    def predict(self, request):
        body = request if isinstance(request, str) else _json.dumps(request)
        status, text = self._svc.predict_json(body)
        return status, _json.loads(text)

    def model_info(self):
        status, text = self._svc.model_info_json()
        return status, _json.loads(text)
