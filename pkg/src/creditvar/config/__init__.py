"""creditvar.config package __init__.py."""
