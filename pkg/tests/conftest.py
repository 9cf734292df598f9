from hypothesis import settings

# first calls into compiled kernels pay JIT or cache-load time
settings.register_profile("default", deadline=None)
settings.load_profile("default")

CRITERIA: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
