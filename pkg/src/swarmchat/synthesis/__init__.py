"""Controller synthesis: prompt assembly and the validate/feedback loop."""
