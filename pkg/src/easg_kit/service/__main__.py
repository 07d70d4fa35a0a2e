"""Run the annotation service: ``python -m easg_kit.service``.

Environment:
    EASG_DATA_DIR     directory for the event log (default ./easg-service-data)
    EASG_HOST         bind address (default 127.0.0.1)
    EASG_PORT         bind port (default 8321)
    EASG_LLM_URL      chat-completion endpoint; LLM routes 502 without it
"""

from __future__ import annotations

import os

import uvicorn

from .app import app_from_env


def main() -> None:
    app = app_from_env()
    host = os.environ.get("EASG_HOST", "127.0.0.1")
    port = int(os.environ.get("EASG_PORT", "8321"))
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
