"""Error taxonomy shared by the library, the service, and the CLI.

Exit codes: 0 success, 2 usage error, 3 data error, 4 missing dependency
artifact. The service maps these onto HTTP statuses; the CLI maps them onto
process exit codes.
"""

from __future__ import annotations


class DforgeError(Exception):
    """Base class for expected, reportable failures."""

    exit_code = 1
    http_status = 500
    code = "error"


class UsageError(DforgeError):
    """Invalid parameters or flag combinations."""

    exit_code = 2
    http_status = 400
    code = "usage_error"


class DataError(DforgeError):
    """Malformed or contract-violating input data."""

    exit_code = 3
    http_status = 422
    code = "data_error"


class MissingArtifactError(DforgeError):
    """A required upstream artifact file does not exist."""

    exit_code = 4
    http_status = 404
    code = "missing_artifact"
