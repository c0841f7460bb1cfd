# GraphLoc
# Object-centric LiDAR place recognition and registration
