from hypothesis import HealthCheck, settings

# Search-backed properties have very uneven per-example cost; wall-clock
# deadlines would make them flaky on slow runners.
settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")
