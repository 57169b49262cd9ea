"""FastAPI backend for cantibec scenario runs."""
