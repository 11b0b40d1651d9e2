// Studio state and the interaction-event reducer.
//
// Every user-visible transition is an event, and `applyEvent` is a pure
// function, so any session can be reproduced exactly by replaying its
// interaction log. Mutating the state outside the reducer is a bug.

export interface ElementLayout {
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface DocumentElement {
  id: string;
  type: string;
  layout: ElementLayout;
  text: string | null;
  color_palette: string[];
  [extra: string]: unknown;
}

export interface StudioDocument {
  id: string;
  title: string;
  layout: { width: number; height: number };
  elements: DocumentElement[];
  [extra: string]: unknown;
}

export interface SlotRef {
  element: string;
  slot: number;
}

export interface Suggestion extends SlotRef {
  hex: string;
  resolution: 'pending' | 'accepted' | 'rejected';
}

export interface AcceptedColor extends SlotRef {
  hex: string;
}

export interface StudioState {
  document: StudioDocument | null;
  masks: SlotRef[];
  suggestions: Suggestion[];
  history: AcceptedColor[];
  generationText: string;
  generatedPalette: string[] | null;
  endpoint: string;
  banner: string | null;
  toast: string | null;
}

export type StudioEvent =
  | { kind: 'load'; json: string }
  | { kind: 'toggle-mask'; element: string; slot: number }
  | { kind: 'set-text'; text: string }
  | { kind: 'set-endpoint'; url: string }
  | { kind: 'suggestions'; colors: string[]; exemplarId: string | null }
  | { kind: 'accept'; element: string; slot: number }
  | { kind: 'reject'; element: string; slot: number }
  | { kind: 'generated'; palette: string[]; exemplarId: string | null }
  | { kind: 'service-error'; message: string }
  | { kind: 'dismiss-toast' };

export function initialState(endpoint = '/v1'): StudioState {
  return {
    document: null,
    masks: [],
    suggestions: [],
    history: [],
    generationText: '',
    generatedPalette: null,
    endpoint,
    banner: null,
    toast: null,
  };
}

const HEX_RE = /^#[0-9a-f]{6}$/;

function asLayout(value: unknown, what: string): ElementLayout {
  const obj = value as Record<string, unknown>;
  if (typeof obj !== 'object' || obj === null) throw new Error(`${what}: layout missing`);
  for (const key of ['x', 'y', 'width', 'height']) {
    if (typeof obj[key] !== 'number') throw new Error(`${what}: layout.${key} must be a number`);
  }
  return obj as unknown as ElementLayout;
}

/** Parse and structurally validate document JSON; throws with a readable message. */
export function parseDocument(json: string): StudioDocument {
  let raw: unknown;
  try {
    raw = JSON.parse(json);
  } catch (err) {
    throw new Error(`not valid JSON: ${(err as Error).message}`);
  }
  const doc = raw as Record<string, unknown>;
  if (typeof doc !== 'object' || doc === null || Array.isArray(doc)) {
    throw new Error('document must be a JSON object');
  }
  if (typeof doc.id !== 'string') throw new Error('document.id must be a string');
  if (!Array.isArray(doc.elements) || doc.elements.length === 0) {
    throw new Error('document.elements must be a non-empty array');
  }
  doc.elements.forEach((el, i) => {
    const element = el as Record<string, unknown>;
    const what = `elements[${i}]`;
    if (typeof element.id !== 'string') throw new Error(`${what}.id must be a string`);
    asLayout(element.layout, what);
    if (!Array.isArray(element.color_palette) || element.color_palette.length === 0) {
      throw new Error(`${what}.color_palette must be a non-empty array`);
    }
    element.color_palette.forEach((c, j) => {
      if (typeof c !== 'string' || !HEX_RE.test(c)) {
        throw new Error(`${what}.color_palette[${j}] is not a #rrggbb color`);
      }
    });
  });
  return doc as unknown as StudioDocument;
}

function slotExists(doc: StudioDocument | null, ref: SlotRef): boolean {
  if (!doc) return false;
  const element = doc.elements.find((el) => el.id === ref.element);
  return !!element && ref.slot >= 0 && ref.slot < element.color_palette.length;
}

function sameSlot(a: SlotRef, b: SlotRef): boolean {
  return a.element === b.element && a.slot === b.slot;
}

/** Toggled masks in document order (element order, then slot index). */
export function orderedMasks(state: StudioState): SlotRef[] {
  const doc = state.document;
  if (!doc) return [];
  const rank = new Map(doc.elements.map((el, i) => [el.id, i]));
  return [...state.masks].sort((a, b) => {
    const byElement = (rank.get(a.element) ?? 0) - (rank.get(b.element) ?? 0);
    return byElement !== 0 ? byElement : a.slot - b.slot;
  });
}

/** Copy of the document with every toggled slot replaced by the mask token. */
export function maskedDocument(state: StudioState): StudioDocument {
  if (!state.document) throw new Error('no document loaded');
  const doc = structuredClone(state.document);
  for (const ref of state.masks) {
    const element = doc.elements.find((el) => el.id === ref.element);
    if (element) element.color_palette[ref.slot] = '[MASK]';
  }
  return doc;
}

function withAccepted(doc: StudioDocument, ref: SlotRef, hex: string): StudioDocument {
  const copy = structuredClone(doc);
  const element = copy.elements.find((el) => el.id === ref.element);
  if (element) element.color_palette[ref.slot] = hex;
  return copy;
}

export function applyEvent(state: StudioState, event: StudioEvent): StudioState {
  switch (event.kind) {
    case 'load': {
      let doc: StudioDocument;
      try {
        doc = parseDocument(event.json);
      } catch (err) {
        return { ...state, banner: (err as Error).message };
      }
      return {
        ...state,
        document: doc,
        masks: [],
        suggestions: [],
        banner: null,
        toast: null,
      };
    }
    case 'toggle-mask': {
      const ref = { element: event.element, slot: event.slot };
      if (!slotExists(state.document, ref)) return state;
      const masks = state.masks.some((m) => sameSlot(m, ref))
        ? state.masks.filter((m) => !sameSlot(m, ref))
        : [...state.masks, ref];
      return { ...state, masks };
    }
    case 'set-text':
      return { ...state, generationText: event.text };
    case 'set-endpoint':
      return { ...state, endpoint: event.url };
    case 'suggestions': {
      // One suggested color per toggled slot, in document order.
      const slots = orderedMasks(state);
      if (event.colors.length !== slots.length) {
        return { ...state, toast: 'suggestion count does not match masked slots' };
      }
      const suggestions = slots.map((ref, i) => ({
        ...ref,
        hex: event.colors[i] as string,
        resolution: 'pending' as const,
      }));
      return { ...state, suggestions, toast: null };
    }
    case 'accept': {
      const ref = { element: event.element, slot: event.slot };
      const suggestion = state.suggestions.find(
        (s) => sameSlot(s, ref) && s.resolution === 'pending',
      );
      if (!suggestion || !state.document) return state;
      return {
        ...state,
        document: withAccepted(state.document, ref, suggestion.hex),
        masks: state.masks.filter((m) => !sameSlot(m, ref)),
        suggestions: state.suggestions.map((s) =>
          sameSlot(s, ref) ? { ...s, resolution: 'accepted' as const } : s,
        ),
        history: [...state.history, { ...ref, hex: suggestion.hex }],
      };
    }
    case 'reject': {
      const ref = { element: event.element, slot: event.slot };
      const suggestion = state.suggestions.find(
        (s) => sameSlot(s, ref) && s.resolution === 'pending',
      );
      if (!suggestion) return state;
      return {
        ...state,
        suggestions: state.suggestions.map((s) =>
          sameSlot(s, ref) ? { ...s, resolution: 'rejected' as const } : s,
        ),
      };
    }
    case 'generated':
      return { ...state, generatedPalette: [...event.palette], toast: null };
    case 'service-error':
      return { ...state, toast: event.message };
    case 'dismiss-toast':
      return { ...state, toast: null };
  }
}

/** Rebuild a session from its interaction log. */
export function replayLog(events: readonly StudioEvent[], endpoint = '/v1'): StudioState {
  return events.reduce(applyEvent, initialState(endpoint));
}
