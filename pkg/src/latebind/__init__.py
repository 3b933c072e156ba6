"""latebind: keep parts of already-sent emails editable.

Selected email content is rendered into externally hosted images that mail
clients fetch at open time, so the owner (or a data binding) can keep
changing what a delivered email shows: self-destructing secrets, fixable
typos, live dashboards, and fresh web snapshots.
"""

__version__ = "0.1.0"
