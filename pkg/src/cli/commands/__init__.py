# CLI Commands
