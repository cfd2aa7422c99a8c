"""Shared exception types."""


class SwarmChatError(Exception):
    """Base class for errors raised by this package."""


class UnknownRobotError(SwarmChatError, KeyError):
    """A robot id was requested that does not exist in the simulation."""

    def __init__(self, robot_id):
        super().__init__(robot_id)
        self.robot_id = robot_id

    def __str__(self):
        return f"unknown robot id {self.robot_id}"


class OutOfBoundsError(SwarmChatError):
    """A pose left the arena; signals a kinematics bug upstream."""


class ScenarioError(SwarmChatError):
    """A scenario or request file failed to load or validate."""
