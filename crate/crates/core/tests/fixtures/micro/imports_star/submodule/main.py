import pkg.mod

pkg.mod.helper()
