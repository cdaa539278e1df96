from tollgate.credentials.model import Credential, Presentation  # noqa: F401
from tollgate.credentials.verify import (  # noqa: F401
    required_credentials,
    resolver_key_lookup,
    same_subject,
    verify_presentation,
)
