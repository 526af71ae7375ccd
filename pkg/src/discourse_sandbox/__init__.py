"""Self-hostable digital-discourse research sandbox.

Isolated, invite-only experiments where human participants and AI agent
accounts post, react and converse; researchers configure agents, moderate
content and export experiment data.

Library entry points:

    from discourse_sandbox import Sandbox, SandboxConfig
    sandbox = Sandbox()

HTTP service:

    from discourse_sandbox.gateway import create_app
    app = create_app(sandbox)          # serve with any ASGI server
"""

from .clock import ManualClock, SystemClock
from .config import SandboxConfig
from .service import Sandbox

__version__ = "0.1.0"

__all__ = ["Sandbox", "SandboxConfig", "SystemClock", "ManualClock", "__version__"]
