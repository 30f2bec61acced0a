"""Services package: the arithmetic, topology, decomposition and cohomology engine plus the script language."""
