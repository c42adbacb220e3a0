"""Stereo speech enhancement with interaural cue preservation."""
