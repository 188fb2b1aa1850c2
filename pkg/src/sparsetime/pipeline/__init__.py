# Package marker for pipeline modules
