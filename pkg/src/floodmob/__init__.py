"""floodmob: residential and mobility-based flood-exposure analytics."""

__version__ = "0.1.0"
