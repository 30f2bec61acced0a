"""Command routers for the script driver, one per family of verbs."""
