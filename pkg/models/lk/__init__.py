# Level-k with errors
