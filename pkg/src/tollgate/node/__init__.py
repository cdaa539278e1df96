from tollgate.node.models import (  # noqa: F401
    Computation,
    ComputationRequest,
    DataPackage,
    ProductRef,
)
from tollgate.node.runtime import NodeRuntime  # noqa: F401
