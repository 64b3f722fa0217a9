"""Live-session bridge: HTTP session control plus a WebSocket event stream."""
