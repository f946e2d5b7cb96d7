"""Human-in-the-loop annotation workflow service.

Work items move questionnaire -> draft -> revision -> variants -> selection,
with every transition appended to a per-item event log. See ``store`` for
the state machine and ``service`` for the HTTP API.
"""

from .service import create_app
from .store import (
    IllegalTransition,
    ItemState,
    LeaseError,
    ValidationFailure,
    WorkItem,
    WorkItemStore,
    derive_detection_label,
)

__all__ = [
    "create_app",
    "IllegalTransition",
    "ItemState",
    "LeaseError",
    "ValidationFailure",
    "WorkItem",
    "WorkItemStore",
    "derive_detection_label",
]
