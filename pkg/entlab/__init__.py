# entlab package
