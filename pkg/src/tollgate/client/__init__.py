"""Command-line clients: seller, buyer and the policy developer tool."""
