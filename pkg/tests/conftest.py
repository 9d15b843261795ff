from __future__ import annotations

from hypothesis import HealthCheck, settings

# derandomised so repeated runs explore the same examples
settings.register_profile("repo", derandomize=True, deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")
