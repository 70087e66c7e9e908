# Command plugins
