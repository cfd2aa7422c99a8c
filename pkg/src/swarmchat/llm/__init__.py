"""Uniform chat-completion interface over remote, local, scripted and oracle backends."""
