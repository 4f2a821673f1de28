# DSR Consensus - Core Package
