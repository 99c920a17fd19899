import { ApiClient } from './api.js';
import { createApp } from './app.js';

async function boot(): Promise<void> {
  const mount = document.getElementById('root');
  if (!mount) return;
  try {
    const app = await createApp(new ApiClient());
    mount.textContent = '';
    mount.appendChild(app);
  } catch (error) {
    mount.textContent = `Failed to load: ${error instanceof Error ? error.message : error}`;
  }
}

if (document.readyState === 'loading') {
  document.addEventListener('DOMContentLoaded', () => void boot());
} else {
  void boot();
}
