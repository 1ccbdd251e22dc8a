"""Flow control: mode selection and split-ratio adaptation."""
