"""UE-side reordering of merged PDCP PDUs."""
