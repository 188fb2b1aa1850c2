# Package marker for evaluation modules
