"""hybridloc CLI entry point."""
