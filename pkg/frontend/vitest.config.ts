import { defineConfig } from "vitest/config";

// Generous timeouts: the e2e suite boots the Python service and retrains
// a real model twice.
export default defineConfig({
  test: {
    environment: "node",
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
