// Colors served by the mock-backed service the tests run against.
export const MOCK_COMPLETE = '#123456';
export const MOCK_GENERATE = ['#264653', '#2a9d8f', '#e9c46a', '#f4a261', '#e76f51'];
