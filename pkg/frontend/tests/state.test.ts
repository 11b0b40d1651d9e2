import { describe, expect, it } from 'vitest';
import {
  applyEvent,
  initialState,
  maskedDocument,
  orderedMasks,
  parseDocument,
  replayLog,
  type StudioEvent,
  type StudioState,
} from '../src/state.js';

const DOC = {
  id: 'doc1',
  title: 'Fixture',
  category: 'test',
  keywords: [],
  layout: { width: 1.0, height: 1.0 },
  elements: [
    {
      id: 'e1',
      type: 'text',
      layout: { x: 0.0, y: 0.0, width: 0.5, height: 0.5 },
      opacity: 1.0,
      text: 'hello',
      color_palette: ['#103050', '#143454', '#183858'],
    },
    {
      id: 'e2',
      type: 'svg',
      layout: { x: 0.5, y: 0.5, width: 0.5, height: 0.5 },
      opacity: 1.0,
      text: null,
      color_palette: ['#1c3c5c', '#1f3f5f'],
    },
  ],
};
const DOC_JSON = JSON.stringify(DOC);

function loaded(): StudioState {
  return applyEvent(initialState(), { kind: 'load', json: DOC_JSON });
}

describe('parseDocument', () => {
  it('accepts a well-formed document', () => {
    const doc = parseDocument(DOC_JSON);
    expect(doc.id).toBe('doc1');
    expect(doc.elements).toHaveLength(2);
  });

  it.each([
    ['not json at all', 'not valid JSON'],
    ['[1, 2]', 'JSON object'],
    ['{"id": "x", "elements": []}', 'non-empty array'],
    [JSON.stringify({ id: 'x', elements: [{ id: 'e', layout: {}, color_palette: ['#000000'] }] }), 'layout.x'],
    [
      JSON.stringify({
        id: 'x',
        elements: [{ id: 'e', layout: { x: 0, y: 0, width: 1, height: 1 }, color_palette: ['red'] }],
      }),
      'not a #rrggbb color',
    ],
  ])('rejects %s', (json, message) => {
    expect(() => parseDocument(json)).toThrow(message);
  });
});

describe('load event', () => {
  it('replaces the document and clears masks and suggestions', () => {
    let state = loaded();
    state = applyEvent(state, { kind: 'toggle-mask', element: 'e1', slot: 0 });
    state = applyEvent(state, { kind: 'load', json: DOC_JSON });
    expect(state.document?.id).toBe('doc1');
    expect(state.masks).toEqual([]);
    expect(state.suggestions).toEqual([]);
    expect(state.banner).toBeNull();
  });

  it('invalid JSON sets the banner and leaves everything else unchanged', () => {
    const before = applyEvent(loaded(), { kind: 'toggle-mask', element: 'e1', slot: 1 });
    const after = applyEvent(before, { kind: 'load', json: '{broken' });
    expect(after.banner).toMatch(/not valid JSON/);
    expect(after.document).toEqual(before.document);
    expect(after.masks).toEqual(before.masks);
  });
});

describe('mask toggles', () => {
  it('toggles on and off', () => {
    let state = applyEvent(loaded(), { kind: 'toggle-mask', element: 'e1', slot: 2 });
    expect(state.masks).toEqual([{ element: 'e1', slot: 2 }]);
    state = applyEvent(state, { kind: 'toggle-mask', element: 'e1', slot: 2 });
    expect(state.masks).toEqual([]);
  });

  it('only references existing (element, slot) pairs', () => {
    const state = loaded();
    expect(applyEvent(state, { kind: 'toggle-mask', element: 'ghost', slot: 0 })).toBe(state);
    expect(applyEvent(state, { kind: 'toggle-mask', element: 'e2', slot: 2 })).toBe(state);
    expect(applyEvent(state, { kind: 'toggle-mask', element: 'e1', slot: -1 })).toBe(state);
  });

  it('orderedMasks sorts by document position regardless of toggle order', () => {
    let state = loaded();
    state = applyEvent(state, { kind: 'toggle-mask', element: 'e2', slot: 1 });
    state = applyEvent(state, { kind: 'toggle-mask', element: 'e1', slot: 2 });
    state = applyEvent(state, { kind: 'toggle-mask', element: 'e1', slot: 0 });
    expect(orderedMasks(state)).toEqual([
      { element: 'e1', slot: 0 },
      { element: 'e1', slot: 2 },
      { element: 'e2', slot: 1 },
    ]);
  });
});

describe('maskedDocument', () => {
  it('replaces exactly the toggled slots and never mutates state', () => {
    let state = loaded();
    state = applyEvent(state, { kind: 'toggle-mask', element: 'e1', slot: 1 });
    const masked = maskedDocument(state);
    expect(masked.elements[0]?.color_palette).toEqual(['#103050', '[MASK]', '#183858']);
    expect(masked.elements[1]?.color_palette).toEqual(['#1c3c5c', '#1f3f5f']);
    expect(state.document?.elements[0]?.color_palette[1]).toBe('#143454');
  });
});

describe('suggestions and accept/reject', () => {
  function withSuggestion(): StudioState {
    let state = loaded();
    state = applyEvent(state, { kind: 'toggle-mask', element: 'e1', slot: 0 });
    state = applyEvent(state, { kind: 'suggestions', colors: ['#aabbcc'], exemplarId: null });
    return state;
  }

  it('maps response colors onto masked slots in document order', () => {
    let state = loaded();
    state = applyEvent(state, { kind: 'toggle-mask', element: 'e2', slot: 0 });
    state = applyEvent(state, { kind: 'toggle-mask', element: 'e1', slot: 2 });
    state = applyEvent(state, { kind: 'suggestions', colors: ['#111111', '#222222'], exemplarId: 'd01' });
    expect(state.suggestions).toEqual([
      { element: 'e1', slot: 2, hex: '#111111', resolution: 'pending' },
      { element: 'e2', slot: 0, hex: '#222222', resolution: 'pending' },
    ]);
  });

  it('flags a count mismatch instead of guessing', () => {
    let state = loaded();
    state = applyEvent(state, { kind: 'toggle-mask', element: 'e1', slot: 0 });
    state = applyEvent(state, { kind: 'suggestions', colors: ['#111111', '#222222'], exemplarId: null });
    expect(state.suggestions).toEqual([]);
    expect(state.toast).toMatch(/does not match/);
  });

  it('accept writes the color into the document, clears the mask, appends history', () => {
    const state = applyEvent(withSuggestion(), { kind: 'accept', element: 'e1', slot: 0 });
    expect(state.document?.elements[0]?.color_palette[0]).toBe('#aabbcc');
    expect(state.masks).toEqual([]);
    expect(state.history).toEqual([{ element: 'e1', slot: 0, hex: '#aabbcc' }]);
    expect(state.suggestions[0]?.resolution).toBe('accepted');
  });

  it('reject leaves the document unchanged', () => {
    const before = withSuggestion();
    const state = applyEvent(before, { kind: 'reject', element: 'e1', slot: 0 });
    expect(state.document).toEqual(before.document);
    expect(state.history).toEqual([]);
    expect(state.suggestions[0]?.resolution).toBe('rejected');
  });

  it('accept and reject are no-ops once resolved or for unknown slots', () => {
    const rejected = applyEvent(withSuggestion(), { kind: 'reject', element: 'e1', slot: 0 });
    expect(applyEvent(rejected, { kind: 'accept', element: 'e1', slot: 0 })).toBe(rejected);
    const state = withSuggestion();
    expect(applyEvent(state, { kind: 'accept', element: 'e2', slot: 0 })).toBe(state);
  });
});

describe('interaction log', () => {
  const SESSION: StudioEvent[] = [
    { kind: 'load', json: DOC_JSON },
    { kind: 'set-endpoint', url: 'http://example.test/v1' },
    { kind: 'toggle-mask', element: 'e1', slot: 0 },
    { kind: 'toggle-mask', element: 'e2', slot: 1 },
    { kind: 'toggle-mask', element: 'e2', slot: 1 },
    { kind: 'suggestions', colors: ['#aabbcc'], exemplarId: 'd02' },
    { kind: 'accept', element: 'e1', slot: 0 },
    { kind: 'set-text', text: 'green grass' },
    { kind: 'generated', palette: ['#111111', '#222222', '#333333', '#444444', '#555555'], exemplarId: null },
    { kind: 'service-error', message: 'boom' },
    { kind: 'dismiss-toast' },
  ];

  it('replaying the log reproduces the state exactly', () => {
    const direct = SESSION.reduce(applyEvent, initialState());
    expect(replayLog(SESSION)).toEqual(direct);
    expect(direct.document?.elements[0]?.color_palette[0]).toBe('#aabbcc');
    expect(direct.generationText).toBe('green grass');
    expect(direct.toast).toBeNull();
  });

  it('history is append-only across every transition', () => {
    let state = initialState();
    let previous = 0;
    for (const event of SESSION) {
      state = applyEvent(state, event);
      expect(state.history.length).toBeGreaterThanOrEqual(previous);
      expect(state.history.length - previous).toBeLessThanOrEqual(1);
      previous = state.history.length;
    }
  });
});
