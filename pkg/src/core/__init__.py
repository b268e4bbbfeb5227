"""Domain model and closed-form latency engine."""
