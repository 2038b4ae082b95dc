#pragma once

// Two joints, nine channels, two frames.
inline constexpr const char* kTwoJointBvh = R"(HIERARCHY
ROOT Hips
{
  OFFSET 0.0 0.0 0.0
  CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation
  JOINT Chest
  {
    OFFSET 0.0 5.21 0.0
    CHANNELS 3 Zrotation Xrotation Yrotation
    End Site
    {
      OFFSET 0.0 4.0 0.0
    }
  }
}
MOTION
Frames: 2
Frame Time: 0.033333
0.0 35.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0
1.5 35.2 -0.5 12.5 -7.25 30.0 4.0 -3.0 2.0
)";
