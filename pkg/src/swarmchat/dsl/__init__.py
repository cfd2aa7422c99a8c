"""State-machine behavior language: parser, renderer, lint, interpreter."""
