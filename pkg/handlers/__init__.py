"""Command handlers: one module per CLI sub-command, each returning a ResultTable."""
