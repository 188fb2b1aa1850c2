# Package marker for storage modules
