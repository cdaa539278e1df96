"""tollgate – policy-gated private data marketplace.

Sellers publish secret-shared, node-sealed data products bound to trust
policies; buyers purchase linear computations that every computation node
runs only after checking the buyer's credentials against every policy.
"""

__version__ = "0.1.0"
