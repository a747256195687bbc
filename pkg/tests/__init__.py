# Test suite for Robotics Task-sequencer System Framework