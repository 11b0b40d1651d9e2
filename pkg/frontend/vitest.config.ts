import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    globalSetup: ['tests/setup/service.ts'],
    // The studio tests run under happy-dom, which enforces the same-origin
    // policy; the page origin below is allow-listed when the service starts.
    environmentOptions: { happyDOM: { url: 'http://localhost:3000' } },
    testTimeout: 15000,
    hookTimeout: 60000,
  },
});
