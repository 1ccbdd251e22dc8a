"""PDCP sequence numbering."""
