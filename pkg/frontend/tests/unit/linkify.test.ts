import { describe, expect, it } from 'vitest';

import { renderTextWithLinks } from '../../src/linkify.js';

function renderedIn(text: string): HTMLElement {
  const host = document.createElement('div');
  host.appendChild(renderTextWithLinks(text));
  return host;
}

describe('renderTextWithLinks', () => {
  it('leaves plain text as text', () => {
    const host = renderedIn('just a sentence with no links');
    expect(host.querySelectorAll('a').length).toBe(0);
    expect(host.textContent).toBe('just a sentence with no links');
  });

  it('turns a URL into an anchor with safe attributes', () => {
    const host = renderedIn('see https://example.com/a?b=1 for details');
    const anchors = host.querySelectorAll('a');
    expect(anchors.length).toBe(1);
    const a = anchors[0]!;
    expect(a.getAttribute('href')).toBe('https://example.com/a?b=1');
    expect(a.textContent).toBe('https://example.com/a?b=1');
    expect(a.getAttribute('target')).toBe('_blank');
    expect(a.getAttribute('rel')).toBe('noopener noreferrer');
    expect(host.textContent).toBe('see https://example.com/a?b=1 for details');
  });

  it('handles several URLs with text between them', () => {
    const host = renderedIn('a http://one.test b https://two.test c');
    const anchors = [...host.querySelectorAll('a')].map((a) => a.textContent);
    expect(anchors).toEqual(['http://one.test', 'https://two.test']);
    expect(host.textContent).toBe('a http://one.test b https://two.test c');
  });

  it('never interprets markup in the text', () => {
    const hostile = 'before <img src=x onerror="window.pwned=1"> after';
    const host = renderedIn(hostile);
    expect(host.querySelector('img')).toBeNull();
    expect(host.textContent).toBe(hostile);
    expect((window as { pwned?: number }).pwned).toBeUndefined();
  });

  it('does not swallow closing punctuation around a link', () => {
    const host = renderedIn('(see https://example.com/page)');
    const a = host.querySelector('a')!;
    expect(a.textContent).toBe('https://example.com/page');
    expect(host.textContent).toBe('(see https://example.com/page)');
  });
});
